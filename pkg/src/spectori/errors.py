"""Structured failures shared by every module."""


class SpectralError(Exception):
    """An operation refused its input or could not finish.

    ``code`` is a short stable tag (e.g. ``REJECT_RANGE``) that callers and the
    CLI match on; ``detail`` is free text for humans.
    """

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)
