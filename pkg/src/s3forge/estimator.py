"""scikit-learn style wrapper around stereographic projection.

:class:`StereographicProjector` is a stateless-once-fitted transformer: ``fit``
only validates the projection point and builds the frame, ``transform`` maps
rows of ``S^3`` to ``R^3`` and ``inverse_transform`` maps back.  It can sit in
a :class:`sklearn.pipeline.Pipeline` and supports ``get_params`` /
``set_params`` and cloning.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_vec4, check_points, check_points_s3
from .quat import UnitQuaternion
from .s3geom import frame_from_pole, stereo_inv_array


class StereographicProjector(TransformerMixin, BaseEstimator):
    """Project points of the three-sphere to ``R^3`` from a chosen pole.

    Parameters
    ----------
    pole : sequence of 4 floats, default (0, 0, 0, 1)
        Projection point; normalized to a unit quaternion during ``fit``.
    extra_rotation : sequence of 4 floats or None
        Optional rotation of the image (a unit quaternion acting on ``R^3``).
    atol : float, default 1e-9
        Allowed deviation of ``|x|^2`` from 1 for input rows.
    """

    def __init__(self, pole=(0.0, 0.0, 0.0, 1.0), extra_rotation=None, atol=1e-9):
        self.pole = pole
        self.extra_rotation = extra_rotation
        self.atol = atol

    def fit(self, X=None, y=None):
        if self.atol < 0:
            raise ValueError("atol must be non-negative")
        pole = UnitQuaternion.normalized(as_vec4(self.pole))
        rot = None if self.extra_rotation is None else UnitQuaternion.normalized(as_vec4(self.extra_rotation))
        self.frame_ = frame_from_pole(pole, rot)
        self.n_features_in_ = 4
        if X is not None:
            check_points_s3(X, self.atol)
        return self

    def transform(self, X):
        check_is_fitted(self, "frame_")
        return self.frame_.project(check_points_s3(X, self.atol))

    def inverse_transform(self, Y):
        check_is_fitted(self, "frame_")
        Y = check_points(Y, 3, "Y")
        # undo the frame rotation; the matrix is orthogonal
        return stereo_inv_array(Y) @ self.frame_.matrix

    def conformal_scale(self, X):
        """Length magnification of the projection at each row of ``X``."""
        check_is_fitted(self, "frame_")
        return self.frame_.scale(check_points_s3(X, self.atol))

    def get_feature_names_out(self, input_features=None):
        return np.array(["y0", "y1", "y2"], dtype=object)
