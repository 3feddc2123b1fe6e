import a


def from_b():
    return a.from_a() + 1
