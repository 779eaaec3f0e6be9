a, b = 1, 2
a, b = b, a
first, *middle, last = range(6)
(x, y), z = (3, 4), 5
for idx, (key, val) in enumerate(sorted({'b': 2, 'a': 1}.items())):
    print(idx, key, val)
print(a, b, first, middle, last, x, y, z)
