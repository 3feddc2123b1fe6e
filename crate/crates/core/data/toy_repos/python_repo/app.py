import pkg.core
from pkg.util import tidy


def main():
    print(pkg.core.run(tidy("input")))


if __name__ == "__main__":
    main()
