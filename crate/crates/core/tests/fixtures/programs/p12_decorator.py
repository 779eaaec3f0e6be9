import functools


def trace(fn):
    @functools.wraps(fn)
    def wrapper(*args):
        result = fn(*args)
        print(fn.__name__, args, '->', result)
        return result

    return wrapper


@trace
def gcd(a, b):
    while b:
        a, b = b, a % b
    return a


x, y = map(int, input().split())
gcd(x, y)
