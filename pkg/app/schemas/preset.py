from pydantic import BaseModel

from app.schemas.experiment import ExperimentConfig


class PresetList(BaseModel):
    presets: list[str]


class PresetRead(BaseModel):
    name: str
    config_hash: str
    config: ExperimentConfig
