"""
异常定义 - 数据错误（退出码1）与用法错误（退出码2）
"""
from typing import Optional


class UniMorphError(ValueError):
    """所有工具包异常的基类"""

    exit_code = 1


class DataError(UniMorphError):
    """输入数据有问题（CLI退出码1）"""

    exit_code = 1

    def __init__(self, message: str, line_no: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line_no = line_no
        self.path = path
        super().__init__(message)

    def with_path(self, path: str) -> "DataError":
        """附加出错的文件路径（由CLI调用）"""
        self.path = path
        return self

    def __str__(self) -> str:
        location = ""
        if self.path:
            location = f"{self.path}:"
            if self.line_no is not None:
                location += f"{self.line_no}:"
            location += " "
        elif self.line_no is not None:
            location = f"line {self.line_no}: "
        return f"{location}{type(self).__name__}: {self.message}"


class UsageError(UniMorphError):
    """命令行用法错误（CLI退出码2）"""

    exit_code = 2


class UnknownCommand(UsageError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown command: {name!r}")


class MissingFile(UsageError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"no such file or directory: {path}")


# ---- unimorph_core ----

class MalformedLine(DataError):
    def __init__(self, line_no: int, field_count: int, expected: int = 3):
        self.field_count = field_count
        self.expected = expected
        super().__init__(f"expected {expected} tab-separated fields, found {field_count}", line_no=line_no)


class EmptyField(DataError):
    def __init__(self, line_no: Optional[int], field: str):
        self.field = field
        super().__init__(f"empty {field} field", line_no=line_no)


class InvalidUtf8(DataError):
    def __init__(self, position: int, reason: str = ""):
        self.position = position
        super().__init__(f"invalid UTF-8 at byte {position}" + (f" ({reason})" if reason else ""))


class InvalidTag(DataError):
    def __init__(self, text: str, line_no: Optional[int] = None):
        self.text = text
        super().__init__(f"invalid feature tag {text!r}", line_no=line_no)


class MissingForm(DataError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"entry {index} has no form")


class DuplicateCategory(DataError):
    def __init__(self, category: str, tag1: str, tag2: str):
        self.category = category
        self.tag1 = tag1
        self.tag2 = tag2
        super().__init__(f"category {category} assigned two tags: {tag1}, {tag2}")


class SchemaError(DataError):
    pass


# ---- datakit ----

class TooSmall(DataError):
    pass


class CapTooSmall(DataError):
    def __init__(self, cap: int, smallest: int):
        self.cap = cap
        self.smallest = smallest
        super().__init__(f"cap {cap} is smaller than the smallest paradigm ({smallest} entries)")


# ---- hallucinate ----

class EmptyAlphabet(DataError):
    def __init__(self):
        super().__init__("alphabet is empty")


class NothingHallucinable(DataError):
    def __init__(self, min_shared_len: int):
        self.min_shared_len = min_shared_len
        super().__init__(f"no entry has a shared segment of length >= {min_shared_len}")


# ---- evalkit ----

class SizeMismatch(DataError):
    def __init__(self, expected: int, actual: int, what: str = "predictions"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected {expected} items, found {actual}")


class EmptySet(DataError):
    def __init__(self, what: str = "items"):
        super().__init__(f"no {what} to score")


class MissingLanguage(DataError):
    def __init__(self, system: str, language: str):
        self.system = system
        self.language = language
        super().__init__(f"system {system} has no rank for language {language}")
