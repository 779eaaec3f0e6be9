def permutations(items):
    if len(items) <= 1:
        return [items[:]]
    result = []
    for i, head in enumerate(items):
        rest = items[:i] + items[i + 1:]
        for tail in permutations(rest):
            result.append([head] + tail)
    return result


letters = list(input().strip())
for p in permutations(letters):
    print(''.join(p))
