values = [0x1F, 0o17, 0b101, 1_000_000, 3.5e-2, 1e3, 2j, .5, 10.]
print(values)
print(7 // 2, -7 // 2, 7 % -3, 2 ** -1, divmod(17, 5))
print(round(2.675, 2), int('ff', 16), float('inf') > 1e308)
