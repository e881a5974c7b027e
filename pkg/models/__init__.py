import numpy as np


def _short(value):
    if isinstance(value, np.ndarray):
        return f"array(shape={value.shape}, dtype={value.dtype})"
    return value


class Model:
    def __repr__(self):
        return f"<{type(self).__name__}({', '.join([f'{k}={_short(v)}' for k, v in self.__dict__.items() if not k.startswith('_')])})>"


class ValueObject:
    """
    Attributes are written once, in ``__init__``. Arrays are frozen so shared instances stay immutable.
    """

    def __setattr__(self, name, value):
        if hasattr(self, name):
            raise AttributeError(f"Direct assignment of attributes is not allowed. {self.__class__.__name__}.{name}")
        if isinstance(value, np.ndarray):
            value = value.view()
            value.setflags(write=False)
        super().__setattr__(name, value)
