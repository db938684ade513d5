"""Exception hierarchy. Every error carries a stable ``code`` string."""


class NetlistError(Exception):
    code = "ERROR"

    def __init__(self, detail=""):
        super().__init__(f"{self.code}: {detail}" if detail else self.code)
        self.detail = detail


class MultiDriverError(NetlistError):
    code = "MULTI_DRIVER"


class DanglingRefError(NetlistError):
    code = "DANGLING_REF"


class DuplicateNameError(NetlistError):
    code = "DUPLICATE_NAME"


class InvalidNodeError(NetlistError):
    code = "INVALID_NODE"


class MalformedJSONError(NetlistError):
    code = "MALFORMED_JSON"


class UnknownBitError(NetlistError):
    code = "UNKNOWN_BIT"


class NoTopError(NetlistError):
    code = "NO_TOP"


class FixtureParseError(NetlistError):
    code = "PARSE_ERROR"

    def __init__(self, lineno, detail=""):
        super().__init__(f"line {lineno}: {detail}")
        self.lineno = lineno


class NoAnchorsError(NetlistError):
    code = "NO_ANCHORS"
