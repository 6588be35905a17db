# Copyright 2026 Geoffrey R. Scheller
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Errors
------

.. admonition:: Exceptions raised by the estimators

    Every exception derives from ``DimensionReductionError`` which itself
    is a ``ValueError``. Callers only interested in "bad input" can keep
    catching ``ValueError``.

    .. note::

        Conditions an estimator can recover from are not exceptions.
        Trimmed density points, ridge regularized inner products, solver
        non-convergence and similar are reported through the
        ``diagnostics`` of the returned result and logged as warnings.

"""

__all__ = [
    'DimensionReductionError',
    'SingularCovariance',
    'AllPointsTrimmed',
    'DimensionOutOfRange',
    'RankDeficientBasis',
    'ResampleFailure',
    'ZeroCozy',
    'InvalidM',
    'ParseError',
    'EmptyAfterNaDrop',
]


class DimensionReductionError(ValueError):
    """Base class for all dimension reduction errors."""


class SingularCovariance(DimensionReductionError):
    def __init__(self, eigenvalue: float, threshold: float) -> None:
        """
        .. admonition:: singular covariance

            :param eigenvalue: Smallest eigenvalue of the covariance.
            :param threshold: Rank tolerance the eigenvalue fell below.

        """
        self.eigenvalue = eigenvalue
        self.threshold = threshold
        msg = (
            f'Covariance is singular, eigenvalue {eigenvalue:.6g} '
            f'below rank tolerance {threshold:.6g}'
        )
        super().__init__(msg)


class AllPointsTrimmed(DimensionReductionError):
    """Every low density indicator is zero, the candidate matrix is empty."""


class DimensionOutOfRange(DimensionReductionError):
    def __init__(self, d: int, p: int) -> None:
        self.d = d
        self.p = p
        super().__init__(f'Dimension d={d} outside of 1 <= d <= {p}')


class RankDeficientBasis(DimensionReductionError):
    """A basis handed to the trace correlation lacks full column rank."""


class ResampleFailure(DimensionReductionError):
    def __init__(self, replicate: int, retries: int) -> None:
        self.replicate = replicate
        self.retries = retries
        msg = (
            f'Bootstrap replicate {replicate} still singular '
            f'after {retries} redraws'
        )
        super().__init__(msg)


class ZeroCozy(DimensionReductionError):
    """The first COZY vector vanishes, the IHT kernel is numerically zero."""


class InvalidM(DimensionReductionError):
    """Hypothesized dimension leaves no degrees of freedom for the test."""


class ParseError(DimensionReductionError):
    def __init__(self, row: int, column: str, value: str) -> None:
        """
        .. admonition:: parse error

            :param row: One based data row, header excluded.
            :param column: Column label.
            :param value: Offending cell text.

        """
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f'Non-numeric value {value!r} at row {row}, column {column!r}')


class EmptyAfterNaDrop(DimensionReductionError):
    """Nothing is left after rows with missing values were dropped."""
