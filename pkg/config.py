"""
配置文件 - 存储所有默认参数
实验 JSON 中的同名小节会按键覆盖这里的默认值
"""
IS_DEBUG = False

# ==============================================================================
# 曲面几何配置
# ==============================================================================
SURFACE_CONFIG = {
    'orient_outward': True,          # 是否把面片统一定向为外法向（体积为正）
    'trust_region': 2.0,             # 指数映射单步上限（平均边长的倍数）
    'substeps_per_edge': 2,          # 网格上指数映射每条边长内的子步数
    'locate_candidates': 8,          # 点定位时检查的最近顶点数
    'log_map_iterations': 20,        # 对数映射不动点迭代上限
    'log_map_tol': 1e-12,            # 对数映射收敛阈值（相对）
    'geodesic_unfold_passes': 2,     # 测地距离展开修正的迭代轮数
    'ellipsoid_newton_iterations': 50,  # 椭球投影的牛顿迭代上限
}

# ==============================================================================
# 离散外微分配置
# ==============================================================================
DEC_CONFIG = {
    'solver_tol': 1e-10,             # 线性求解相对残差
    'refinement_steps': 3,           # 迭代精化步数
    'compatibility_tol': 1e-9,       # Poisson 右端项相容性容差（相对）
    'harmonic_tol': 1e-8,            # 调和基 ‖dζ‖+‖d*ζ‖ 容差
    'excluded_penalty': 1e6,         # 同调圈避开排除顶点时的惩罚权重
}

# ==============================================================================
# 切向量场配置
# ==============================================================================
FIELD_CONFIG = {
    'current_floor': 1e-8,           # 涡核内电流归一化下限
    'unit_tol': 1e-6,                # 判定单位场的容差
}

# ==============================================================================
# GL 流配置
# ==============================================================================
FLOW_CONFIG = {
    'epsilon': 0.1,                  # 涡核尺度 ε
    'dt': 1e-3,                      # 时间步长（加速时钟）
    'T': 0.1,                        # 终止时间
    'scheme': 'semi_implicit',       # 时间格式：'semi_implicit' 或 'explicit'
    'model': 'extrinsic',            # 能量模型：'extrinsic' 或 'intrinsic'
    'stride': 10,                    # 输出采样间隔（步数）
    'explicit_cfl': 0.5,             # 显式格式稳定性系数 c
    'energy_tol': 1e-10,             # 单步能量上升容差
    'max_halvings': 8,               # 能量上升时步长减半次数上限
    'cg_tol': 1e-12,                 # 共轭梯度相对残差
    'cg_maxiter': 2000,              # 共轭梯度最大迭代次数
    'keep_snapshots': True,          # 是否在轨迹中保存场快照
    'core_match': 8.0,               # 初值核剖面在 r = core_match·ε 处接到 1
    'stop_at_collision': True,       # 检测到 T* 事件时停止
}

# ==============================================================================
# 涡旋追踪配置
# ==============================================================================
TRACKING_CONFIG = {
    'mass_fraction': 0.5,            # 面涡度阈值 = mass_fraction·max|ω|
    'mass_floor': 1e-3,              # 面涡度绝对下限
    'merge_radius_cells': 3.0,       # 合并半径（网格单元数）
    'grow_rings': 3,                 # 聚类向外扩张的环数
    'max_trail_points': 10000,       # 每个涡旋保存的轨迹点数
    'defect_warning': 0.25,          # 度数取整缺陷超过该值时告警
}

# ==============================================================================
# 重整化能量配置
# ==============================================================================
RENORMALIZED_CONFIG = {
    'rho_cells': 10.0,               # W^intr 截断半径 ρ₀（网格单元数）
    'eta_cells': 8.0,                # 梯度边界积分半径 η₀（网格单元数）
    'ring_samples': 96,              # 边界圆周采样点数
    'clearance_rings': 2,            # 同调圈与涡旋之间保留的环数
    'period_tol': 1e-6,              # 周期缺陷容差（单位 2π）
    'theta_tol': 1e-8,               # θ 欧拉-拉格朗日残差容差
    'theta_max_iter': 500,           # θ 梯度下降迭代上限
    'newton_switch': 1e-4,           # 残差低于该值后切换牛顿法
    'newton_max_iter': 30,           # 牛顿迭代上限
    'armijo_c1': 1e-4,               # Armijo 条件常数
    'gradient_method': 'split',      # 梯度公式：'split'（u* + 外在项）或 'full'（u₀）
    'fd_step_cells': 2.0,            # 有限差分步长（网格单元数）
    'min_separation_cells': 4.0,     # 梯度计算要求的最小涡旋间距（网格单元数）
    'disk_fraction': 0.45,           # 截断圆盘半径上限（最小涡旋间距的倍数）
}

# ==============================================================================
# 核能量配置
# ==============================================================================
CORE_CONFIG = {
    'r_start': 1e-4,                 # 打靶起点
    'r_shoot': 14.0,                 # 打靶积分终点
    'r_match': 8.0,                  # 数值剖面与渐近展开的衔接半径
    'bisection_steps': 80,           # 二分次数
    'radii': (20.0, 40.0, 80.0),     # γ 外推使用的半径
    'slope_bracket': (0.3, 1.0),     # 初始斜率 f'(0) 的二分区间
}

# ==============================================================================
# 有效动力学配置
# ==============================================================================
EFFECTIVE_CONFIG = {
    'h': 1e-3,                       # 初始步长
    'T': 0.1,                        # 终止时间
    'max_halvings': 10,              # W 下降检验的步长减半上限
    'w_tol': 1e-9,                   # W 下降检验容差
    'collision_cells': 4.0,          # 碰撞阈值（网格单元数）
    'gradient_blowup': 1e6,          # 梯度爆炸阈值
    'sample_stride': 1,              # 采样间隔（步数）
}

# ==============================================================================
# 输出配置
# ==============================================================================
OUTPUT_CONFIG = {
    'out_dir': 'out',                # 默认输出目录
    'schema_version': 1,             # CSV 模式版本
    'float_format': '%.12g',         # 浮点数输出格式
    'console_format': 'simple',      # 命令行输出格式：'simple' 或 'json'
    'enable_console_output': True,   # 是否打印结果摘要
    'log_to_file': False,            # 是否额外写入日志文件
    'log_dir': 'logs',               # 日志目录
}
