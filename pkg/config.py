import os
import sys
from typing import Optional, Any


class ConfigMeta(type):
    """元类，用于实现类级别的__getattr__"""

    def __getattr__(cls, name: str) -> Any:
        """动态获取配置属性"""
        return cls._get_config_value(name)


def load_env_file(env_file: str) -> bool:
    """加载环境变量文件（已存在的环境变量优先）"""
    if not os.path.isabs(env_file):
        env_file = os.path.join(os.getcwd(), env_file)

    if not os.path.exists(env_file):
        return False

    loaded_count = 0
    with open(env_file, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith('#') and '=' in line:
                key, value = line.split('=', 1)
                os.environ.setdefault(key.strip(), value.strip().strip('"\''))
                loaded_count += 1
    print(f"✓ 从 {env_file} 加载 {loaded_count} 个环境变量", file=sys.stderr)
    return True


class Config(metaclass=ConfigMeta):
    """应用配置类 - 使用元类实现延迟读取环境变量"""

    @staticmethod
    def _get_env(key: str, default: Optional[str] = None) -> Optional[str]:
        """获取环境变量"""
        return os.getenv(key, default)

    @classmethod
    def _get_config_value(cls, name: str) -> Any:
        """动态获取配置属性"""
        # Schema配置
        if name == "SCHEMA_PATH":
            return cls._get_env("UNIMORPH_SCHEMA_PATH") or None
        elif name == "DEFAULT_SEED":
            return int(cls._get_env("UNIMORPH_DEFAULT_SEED", "0"))

        # 数据划分配置
        elif name == "SPLIT_TRAIN_FRACTION":
            return float(cls._get_env("SPLIT_TRAIN_FRACTION", "0.70"))
        elif name == "SPLIT_DEV_FRACTION":
            return float(cls._get_env("SPLIT_DEV_FRACTION", "0.10"))
        elif name == "SPLIT_TEST_FRACTION":
            return float(cls._get_env("SPLIT_TEST_FRACTION", "0.20"))
        elif name == "SPLIT_TRAIN_CAP":
            return int(cls._get_env("SPLIT_TRAIN_CAP", "100000"))

        # 数据幻觉（hallucination）配置
        elif name == "HALLUCINATION_MIN_SHARED":
            return int(cls._get_env("HALLUCINATION_MIN_SHARED", "4"))
        elif name == "HALLUCINATION_MAX_RETRIES":
            return int(cls._get_env("HALLUCINATION_MAX_RETRIES", "50"))
        elif name == "HALLUCINATION_LOW_RESOURCE_THRESHOLD":
            return int(cls._get_env("HALLUCINATION_LOW_RESOURCE_THRESHOLD", "1000"))

        # 显著性检验配置（10000次采样，50%比例，p<0.005）
        elif name == "BOOTSTRAP_SAMPLES":
            return int(cls._get_env("BOOTSTRAP_SAMPLES", "10000"))
        elif name == "BOOTSTRAP_RATIO":
            return float(cls._get_env("BOOTSTRAP_RATIO", "0.5"))
        elif name == "BOOTSTRAP_ALPHA":
            return float(cls._get_env("BOOTSTRAP_ALPHA", "0.005"))

        # 运行配置
        elif name == "JOBS":
            return int(cls._get_env("JOBS", "1"))
        elif name == "DEBUG":
            return cls._get_env("DEBUG", "False").lower() == "true"

        # 如果属性不存在，抛出AttributeError
        raise AttributeError(f"'{cls.__name__}' object has no attribute '{name}'")

    @classmethod
    def validate_config(cls) -> bool:
        """验证配置是否正确"""
        try:
            fractions = (cls.SPLIT_TRAIN_FRACTION, cls.SPLIT_DEV_FRACTION, cls.SPLIT_TEST_FRACTION)
            if any(not 0 < f < 1 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
                print(f"❌ SPLIT_*_FRACTION 必须在(0,1)之间且和为1: {fractions}", file=sys.stderr)
                return False
            if cls.SPLIT_TRAIN_CAP < 1:
                print("❌ SPLIT_TRAIN_CAP 必须 ≥ 1", file=sys.stderr)
                return False
            if cls.BOOTSTRAP_SAMPLES < 1:
                print("❌ BOOTSTRAP_SAMPLES 必须 ≥ 1", file=sys.stderr)
                return False
            if not 0 < cls.BOOTSTRAP_RATIO <= 1:
                print("❌ BOOTSTRAP_RATIO 必须在(0,1]之间", file=sys.stderr)
                return False
            if not 0 < cls.BOOTSTRAP_ALPHA < 1:
                print("❌ BOOTSTRAP_ALPHA 必须在(0,1)之间", file=sys.stderr)
                return False
            if cls.HALLUCINATION_MIN_SHARED < 2:
                print("❌ HALLUCINATION_MIN_SHARED 必须 ≥ 2", file=sys.stderr)
                return False
            if cls.JOBS < 1:
                print("❌ JOBS 必须 ≥ 1", file=sys.stderr)
                return False
        except ValueError as e:
            print(f"❌ 环境变量格式错误: {e}", file=sys.stderr)
            return False
        return True

    @classmethod
    def print_config(cls):
        """打印当前配置"""
        out = sys.stderr
        print("=== 当前配置 ===", file=out)
        print(f"调试模式: {cls.DEBUG}", file=out)
        print(f"Schema文件: {cls.SCHEMA_PATH or '(内置)'}", file=out)
        print(f"默认随机种子: {cls.DEFAULT_SEED}", file=out)
        print(
            f"划分比例: {cls.SPLIT_TRAIN_FRACTION}/{cls.SPLIT_DEV_FRACTION}/{cls.SPLIT_TEST_FRACTION}"
            f"，训练集上限: {cls.SPLIT_TRAIN_CAP}",
            file=out,
        )
        print(f"幻觉最短共享子串: {cls.HALLUCINATION_MIN_SHARED}", file=out)
        print(
            f"Bootstrap: samples={cls.BOOTSTRAP_SAMPLES}, ratio={cls.BOOTSTRAP_RATIO}, alpha={cls.BOOTSTRAP_ALPHA}",
            file=out,
        )
        print(f"并行数: {cls.JOBS}", file=out)
        print("================", file=out)
