class Temperature:
    scale = 'C'

    def __init__(self, degrees):
        self._degrees = degrees

    @property
    def degrees(self):
        return self._degrees

    @staticmethod
    def to_f(c):
        return c * 9 / 5 + 32

    @classmethod
    def from_f(cls, f):
        return cls((f - 32) * 5 / 9)


t = Temperature.from_f(212)
print(round(t.degrees, 2), Temperature.to_f(t.degrees), t.scale)
