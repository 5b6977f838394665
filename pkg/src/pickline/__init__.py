"""Under-pickling defect prediction and line-speed advisory toolkit."""

from .advisor import (
    Advice,
    Infeasible,
    MaxSpeed,
    ScanGrid,
    SpeedRange,
    TracePoint,
    advice_to_dict,
    advise,
    parse_advice,
    render_advice,
    scan_speeds,
    summary_line,
)
from .config import AppConfig, load_config
from .errors import (
    ConfigurationError,
    GenerationBudgetError,
    InvalidInputError,
    InvalidSplitError,
    ModelFormatError,
    NotFittedError,
    PicklineError,
    RecordValidationError,
    SaturatedBathError,
    SchemaError,
    SplitSizeError,
)
from .metrics import (
    ConfusionMatrix,
    GlobalReport,
    evaluate_global,
    f_measure,
    false_alarm_rate,
    precision,
    recall,
    stratified_split,
)
from .records import (
    CSV_COLUMNS,
    DEFECT,
    NO_DEFECT,
    CoilRecord,
    Dataset,
    SpeedClass,
    class_bounds,
    classify_speed,
    read_csv,
    validate_record,
    write_csv,
)
from .recbfn import (
    InputScaler,
    RecBFNetwork,
    RecBFUnit,
    fit_defect_network,
    load_network,
    membership,
    normalize,
    save_network,
    train_recbfn,
)
from .simulator import (
    KineticsParams,
    LineGeometry,
    OracleDefectModel,
    Recipe,
    SamplingRanges,
    defect_boundary_speed,
    generate_dataset,
    label_sample,
    required_pickling_time,
    residence_time,
)
from .tree import (
    DecisionTree,
    TreeConfig,
    best_split,
    entropy,
    gain_ratio,
    label_records,
    load_tree,
    predict_class,
    save_tree,
    train_tree,
)
from .workflow import TrainResult, evaluate_validation, load_models, save_models, train_models

__version__ = "0.1.0"
