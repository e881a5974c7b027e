import datetime
import time


def now_for_logs():
    return datetime.datetime.now().strftime("%d-%m-%Y %H:%M:%S")


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start) * 1000.0
