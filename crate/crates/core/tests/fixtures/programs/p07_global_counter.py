counter = 0


def bump(step=1):
    global counter
    counter += step
    return counter


for i in range(5):
    bump(i)
print(counter)
