from pydantic import BaseModel, ConfigDict


class CustomBaseModel(BaseModel):
    """Immutable base for all domain records: values are computed once and shared."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)
