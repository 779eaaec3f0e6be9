n = int(input())
print(bin(n), n & (n - 1) == 0)
print(n << 2, n >> 1, n ^ 0xFF, ~n, n | 1)
mask = 0
for bit in range(0, 8, 2):
    mask |= 1 << bit
print(mask, popcount := bin(n).count('1'))
