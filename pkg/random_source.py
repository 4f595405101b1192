"""
随机数源 - 所有随机操作（划分、幻觉、bootstrap）统一使用 numpy 的 PCG64
"""
import hashlib

import numpy as np


def derive_seed(master: int, *labels) -> int:
    """由主种子和若干标签（语言、系统对、worker编号等）派生子种子

    与执行顺序无关：并行与串行得到相同的子种子。
    """
    h = hashlib.sha256(str(int(master)).encode("utf-8"))
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


def make_rng(seed: int, *labels) -> np.random.Generator:
    """创建PCG64随机数生成器；给定labels时先派生子种子"""
    if labels:
        seed = derive_seed(seed, *labels)
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
