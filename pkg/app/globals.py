import threading

# Variável global para interromper treinos longos entre episódios
stop_event = threading.Event()

SENSORS = ("camera", "radar", "beacon", "rss")

TRACE_SCHEMA_VERSION = "trace-v1"
TRACE_COLUMNS = [
    "step", "episode",
    "w1", "w2", "w3", "w4",
    "a1", "a2", "a3", "a4",
    "delta", "spacing_m", "spacing_dev_m", "regret", "eps_explore",
]
TRACE_HEADER = ",".join(TRACE_COLUMNS)

CHECKPOINT_VERSION = 1
DEFAULT_OUT_DIR = "runs"
