from fastapi import APIRouter

from app.schemas.preset import PresetList, PresetRead
from app.services.config_loader import config_hash, list_presets, load_config

router = APIRouter(prefix="/presets", tags=["presets"])


@router.get("", response_model=PresetList)
async def get_presets():
    return PresetList(presets=list_presets())


@router.get("/{name}", response_model=PresetRead)
async def get_preset(name: str):
    """The parsed, validated config of a bundled preset."""
    cfg = load_config(preset=name)
    return PresetRead(name=name, config_hash=config_hash(cfg), config=cfg)
