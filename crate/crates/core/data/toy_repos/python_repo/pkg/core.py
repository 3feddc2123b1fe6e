from . import util


def run(value):
    # normalize before echoing back
    return util.tidy(value)
