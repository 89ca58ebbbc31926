"""
错误类型定义 - 每个模块一个异常族，统一携带模块名与诊断信息
"""

from typing import Any, Dict, Optional


class GLVortexError(Exception):
    """所有 glvortex 错误的基类

    Args:
        message: 人类可读的错误描述
        module: 出错模块名（如 'surface-geometry'）
        diagnostic: 机器可读的诊断字典（出错的单纯形、残差、缺陷向量等）
    """

    module = "glvortex"

    def __init__(self, message: str, module: Optional[str] = None, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        if module is not None:
            self.module = module
        self.diagnostic = dict(diagnostic or {})

    def to_dict(self) -> Dict[str, Any]:
        """转换为 CLI 输出使用的错误记录"""
        return {
            'error': type(self).__name__,
            'module': self.module,
            'message': self.message,
            'diagnostic': to_jsonable(self.diagnostic),
        }


def to_jsonable(value: Any) -> Any:
    """把 numpy 标量/数组等转换为可 JSON 序列化的对象"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, 'tolist'):
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


# ==============================================================================
# 曲面几何
# ==============================================================================
class GeometryError(GLVortexError, ValueError):
    """网格非流形、有边界、定向不一致或描述参数无效"""
    module = "surface-geometry"


class StepTooLargeError(GeometryError):
    """指数映射步长超出信赖域，积分器需要缩小步长"""


# ==============================================================================
# 离散外微分
# ==============================================================================
class DECError(GLVortexError):
    """尺寸不匹配或线性求解失败"""
    module = "dec-operators"


class CompatibilityError(DECError, ValueError):
    """Poisson 右端项总积分不为零"""


class HomologyError(DECError):
    """无法找到避开排除集的独立同调圈，或周期矩阵奇异"""


# ==============================================================================
# 切向量场
# ==============================================================================
class FieldError(GLVortexError, ValueError):
    """场的尺寸或取值无效"""
    module = "tangent-fields"


# ==============================================================================
# GL 流
# ==============================================================================
class FlowError(GLVortexError):
    """时间推进失败"""
    module = "gl-flow"


class StabilityError(FlowError, ValueError):
    """显式格式违反稳定性条件"""


# ==============================================================================
# 重整化能量
# ==============================================================================
class RenormalizedEnergyError(GLVortexError):
    """重整化能量计算失败"""
    module = "renormalized-energy"


class AdmissibilityError(RenormalizedEnergyError, ValueError):
    """涡旋位置重合或度数和不等于欧拉示性数"""


class PeriodDefectError(RenormalizedEnergyError):
    """周期约束不满足，典范场不存在"""


class ConvergenceError(RenormalizedEnergyError):
    """迭代（θ 求解、打靶法）未在预算内收敛"""


class SeparationError(RenormalizedEnergyError):
    """涡旋间距过小，边界积分被污染"""


# ==============================================================================
# 有效动力学
# ==============================================================================
class EffectiveDynamicsError(GLVortexError):
    """有效 ODE 积分或比较失败"""
    module = "effective-dynamics"


class CollisionError(EffectiveDynamicsError):
    """涡旋间距低于碰撞阈值"""


# ==============================================================================
# 命令行
# ==============================================================================
class ConfigError(GLVortexError, ValueError):
    """实验配置无效"""
    module = "cli-harness"


class OutputError(GLVortexError, ValueError):
    """结果文件写入失败（行列不一致等）"""
    module = "cli-harness"
