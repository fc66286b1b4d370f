"""Error type shared by every module; `code` is the machine-readable tag."""


class PredimError(Exception):

    def __init__(self, code, message="", **detail):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message
        self.detail = detail

    def to_json(self):
        out = {"error": self.code, "message": self.message}
        out.update({k: v for k, v in self.detail.items() if _plain(v)})
        return out


def _plain(v):
    return isinstance(v, (str, int, float, bool, list, tuple, dict)) or v is None
