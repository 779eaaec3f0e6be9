def primes(limit):
    sieve = [True] * (limit + 1)
    for p in range(2, limit + 1):
        if sieve[p]:
            yield p
            for q in range(p * p, limit + 1, p):
                sieve[q] = False


def chunks(seq, size):
    for start in range(0, len(seq), size):
        yield from [seq[start:start + size]]


n = int(input())
print(list(chunks(list(primes(n)), 4)))
