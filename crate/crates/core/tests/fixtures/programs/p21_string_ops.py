text = input()
words = text.split()
print(len(words))
print(' '.join(w.capitalize() for w in words))
print(text.replace('a', '@').upper())
counts = {}
for ch in text:
    if ch.isalpha():
        counts[ch] = counts.get(ch, 0) + 1
print(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:3])
