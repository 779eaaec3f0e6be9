# leading comment
import sys  # trailing comment
sys.setrecursionlimit(100000)


def depth(n):  # recursive depth
    # base case
    if n == 0:
        return 0
    return 1 + depth(n - 1)  # step


print(depth(int(input())))
# final comment
