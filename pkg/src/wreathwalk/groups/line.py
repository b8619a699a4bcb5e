"""The integers as a group (for simple random walk on Z)."""
from ..errors import GroupMismatch


class IntegerLine:
    name = "Z"
    identity = 0

    def mul(self, a, b):
        if not isinstance(a, int) or not isinstance(b, int):
            raise GroupMismatch("IntegerLine expects integers")
        return a + b

    def inv(self, a):
        return -a

    def conj(self, a, g):
        return a

    def phi(self, a):
        return a

    def lift(self, x):
        return x

    def key(self, a):
        return str(a)

    def __eq__(self, other):
        return isinstance(other, IntegerLine)

    def __hash__(self):
        return hash("IntegerLine")

    def __repr__(self):
        return "IntegerLine()"
