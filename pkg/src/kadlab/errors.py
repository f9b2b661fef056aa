"""Exception hierarchy shared by every kadlab module."""


class KadlabError(Exception):
    """Base class for all library errors."""


class DimensionError(KadlabError, ValueError):
    """Two identifiers (or an identifier and a trie) disagree on the bit length d."""


class UndefinedBucketError(KadlabError, ValueError):
    """bucket_index was asked about a node and itself."""


class DuplicateIdError(KadlabError, ValueError):
    pass


class EmptySubtreeError(KadlabError, ValueError):
    pass


class MissingNodeError(KadlabError, KeyError):
    def __str__(self):
        # KeyError repr-quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class CapacityError(KadlabError, ValueError):
    """More distinct identifiers were requested than {0,1}^d holds."""


class IdParseError(KadlabError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class InfeasibleError(KadlabError, ValueError):
    """An exhaustive enumeration would exceed its size budget."""


class ConfigError(KadlabError, ValueError):
    """Invalid experiment configuration; carries every problem found, not just the first."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
