name = input().strip()
count = int(input())
width = 8
ratio = count / 3
print(f"{name!r} has {count} items")
print(f"{name:>{width}}|{ratio:.3f}")
print(f"{count = }")
print(f"{'nested ' + name}")
print(f"{{literal}} {count * 2}")
