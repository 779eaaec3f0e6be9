n = int(input())
squares = [i * i for i in range(n)]
evens = {i for i in squares if i % 2 == 0}
index = {v: k for k, v in enumerate(squares)}
pairs = [(a, b) for a in range(3) for b in range(a)]
gen = sum(x for x in squares if x > 10)
print(squares, sorted(evens), index[16], pairs, gen)
