"""Fixed-rank matrix geometries.

Four interchangeable factorizations of a rank-r matrix W, each packaged
as a Geometry so solvers can run on any of them:

* fullrank:  W = G H^T with both factors full rank (quotient by GL(r))
* polar:     W = U B V^T, orthonormal U, V and SPD B (quotient by O(r))
* subspace:  W = U Y^T, orthonormal U (quotient by O(r))
* embedded:  W = U diag(s) V^T as a submanifold of the matrix space
"""

from .fullrank import FullRankGeometry, FullRankPoint
from .polar import PolarGeometry, PolarPoint
from .subspace import SubspaceGeometry, SubspacePoint
from .embedded import EmbeddedGeometry, EmbeddedPoint, DenseAmbient

GEOMETRY_TAGS = (
    "fullrank",
    "fullrank-euclidean",
    "polar",
    "polar-diagonal",
    "subspace",
    "subspace-euclidean",
    "embedded",
)


def geometry_from_tag(tag: str):
    """Build a Geometry from its configuration tag."""
    base, _, variant = tag.partition("-")
    if base == "fullrank" and variant in ("", "euclidean"):
        return FullRankGeometry(scale_invariant=(variant == ""))
    if base == "polar" and variant in ("", "diagonal"):
        return PolarGeometry(diagonal=(variant == "diagonal"))
    if base == "subspace" and variant in ("", "euclidean"):
        return SubspaceGeometry(scale_invariant=(variant == ""))
    if base == "embedded" and variant == "":
        return EmbeddedGeometry()
    raise ValueError(f"unknown geometry tag {tag!r}; expected one of {GEOMETRY_TAGS}")


__all__ = [
    "FullRankGeometry",
    "FullRankPoint",
    "PolarGeometry",
    "PolarPoint",
    "SubspaceGeometry",
    "SubspacePoint",
    "EmbeddedGeometry",
    "EmbeddedPoint",
    "DenseAmbient",
    "GEOMETRY_TAGS",
    "geometry_from_tag",
]
