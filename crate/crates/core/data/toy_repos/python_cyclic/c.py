import b


def from_c():
    return 0
