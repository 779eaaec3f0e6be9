vals = list(map(int, input().split()))
for v in vals:
    if 0 <= v < 10:
        kind = 'digit'
    elif 10 <= v <= 99:
        kind = 'two'
    elif v is None or v != v:
        kind = 'odd'
    else:
        kind = 'big'
    print(v, kind, not v, v in (1, 2, 3), v not in [4])
