"""Compact covering number of a non-compact base space."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from cardinal import ALEPH_0, CardinalField, Order, compare, max_cardinal
from errors import CompactSpace, IncomparableCardinals, InconsistentDescription
from log_utils import LogCategory, log_debug, log_warning

MANIFOLD = "manifold"
LOCALLY_COMPACT_PARACOMPACT = "locallyCompactParacompact"


class BaseSpaceDesc(BaseModel):
    """Description of the base space M of a test-function space."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    compact: bool = False
    components: CardinalField
    cover_size: Optional[CardinalField] = Field(default=None, alias="coverSize")
    kind: Literal["manifold", "locallyCompactParacompact"] = MANIFOLD

    @field_validator("cover_size")
    @classmethod
    def _countable_kind(cls, value):
        if value is not None and value.kind == "continuum":
            raise ValueError("coverSize must be finite or an aleph")
        return value


def theta(M: BaseSpaceDesc):
    """Least size of a cover of M by compact sets.

    A declared locally finite relatively compact cover gives its size;
    otherwise the count is ``max(components, aleph_0)``.
    """
    if M.compact:
        log_warning("Rejected compact base space", LogCategory.COVERING)
        raise CompactSpace("Covering number is only defined here for non-compact spaces")

    from_components = max_cardinal(M.components, ALEPH_0)
    if M.cover_size is None:
        log_debug(f"theta(M) = max({M.components}, aleph_0) = {from_components}", LogCategory.COVERING)
        return from_components

    order = compare(from_components, M.cover_size)
    if order is Order.UNKNOWN:
        raise IncomparableCardinals(f"Cannot compare coverSize {M.cover_size} with {from_components}")
    if order is not Order.EQUAL:
        raise InconsistentDescription(
            f"coverSize {M.cover_size} disagrees with max(components, aleph_0) = {from_components}"
        )
    log_debug(f"theta(M) = declared cover size {M.cover_size}", LogCategory.COVERING)
    return M.cover_size


def is_sigma_compact(M: BaseSpaceDesc) -> bool:
    return theta(M) == ALEPH_0
