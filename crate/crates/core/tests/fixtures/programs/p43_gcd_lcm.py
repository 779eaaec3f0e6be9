import math
from functools import reduce

nums = list(map(int, input().split()))
g = reduce(math.gcd, nums)
l = reduce(lambda x, y: x * y // math.gcd(x, y), nums)
print(g, l)
