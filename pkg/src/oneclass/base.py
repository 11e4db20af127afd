"""Minimal estimator base giving sklearn-compatible get_params/set_params."""

import inspect

from .exceptions import ParameterError


class BaseEstimator:
    """Estimators store constructor arguments verbatim as attributes.

    That convention makes get_params/set_params (and sklearn's clone)
    work without any per-class bookkeeping.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ParameterError(
                    f"invalid parameter {name!r} for {type(self).__name__}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
