"""GOA / OORA 프롬프트 고정 문구.

문구는 바이트 단위로 고정되어 있으며 golden 파일 테스트로 검증된다.
"""

from __future__ import annotations

# === GOA (전역 객체 예측) ===
GOA_HEADER = (
    "You are an object prediction assistant for scene understanding. "
    "In this task, you are provided with observed scene information from past frames "
    "and a list of future frame numbers. Your task is to predict the possible objects "
    "for the exact future frames and answer in a fixed format."
)

GOA_ONE_SHOT = "\n".join(
    [
        "Example:",
        "Observed:",
        "Frame 42: object: medicine attention: looking_at, spatial: in_front_of, "
        "contact: holding.",
        "Frame 87: object: medicine attention: looking_at, spatial: in_front_of, "
        "contact: holding.",
        "object: cup/glass/bottle attention: looking_at, spatial: in_front_of, "
        "contact: holding, touching.",
        "Frame 111: object: medicine attention: looking_at, spatial: in_front_of, "
        "contact: holding.",
        "Future frame numbers to predict objects for: Frame 125, 136",
        "Frame 125: medicine, cup/glass/bottle",
        "Frame 136: medicine, cup/glass/bottle",
    ]
)

GOA_IMPORTANT = "\n".join(
    [
        "IMPORTANT: Objects may appear or disappear over time. Consider the following:",
        "1. Objects that were recently visible may still be present even if not mentioned",
        "2. New objects may appear as the scene changes",
        "3. Some objects may disappear from view as time progresses",
        "4. The longer the time gap, the more likely the scene has changed significantly",
    ]
)

GOA_AVAILABLE = "Available objects: {objects}"
GOA_OBSERVED = "Observed:"

GOA_INSTRUCTION = "\n".join(
    [
        "Please output in the following format:",
        "Frame <index>: <objects>",
        "Each frame should be on a separate line with no additional commentary.",
    ]
)

GOA_CUE = "Future frame numbers to predict objects for: {frames}:"

# === OORA (객체별 관계 예측) ===
OORA_HEADER = (
    "You are a scene graph anticipation assistant. In scene graph anticipation, "
    "you are given a series of observed frames containing a specific object. "
    "Your task is to predict how a person will interact with this object in the future."
)

OORA_NOTE = "\n".join(
    [
        "Note:",
        "Attention indicates whether the person is looking at the object.",
        "Contact indicates whether the person physically touches or interacts with the object.",
        "Spatial indicates the relative spatial position of the object with respect to "
        "the person.",
    ]
)

OORA_ONE_SHOT = "\n".join(
    [
        "Example: Observed segment for object medicine:",
        "Frame 42..207: object: medicine attention: not_looking_at, spatial: in_front_of, "
        "contact: holding.",
        "Frame 222: object: medicine attention: not_looking_at, spatial: in_front_of, "
        "contact: holding.",
        "Future frames: Frame 226, 236 for object [medicine]:",
        "Frame 226: medicine attention: not_looking_at, spatial: in_front_of, "
        "contact: holding.",
        "Frame 236: medicine attention: not_looking_at, spatial: in_front_of, "
        "contact: holding, eating.",
    ]
)

OORA_CATEGORIES = "\n".join(
    [
        "The possible relationship categories are:",
        "Attention: {attention}",
        "Spatial: {spatial}",
        "Contact: {contact}",
    ]
)

OORA_OBSERVED = "Observed segment for object [{object}]:"

OORA_INSTRUCTION = "\n".join(
    [
        "Please generate the scene graph for object [{object}] in each of the following "
        "future frames: {frames}.",
        "Output one scene graph per frame in the following format:",
        "Frame <index>: object: {object} attention: <attention_relationship>, "
        "spatial: <spatial_relationship>, contact: <contact_relationship>",
        "Ensure each frame is on a separate line and no additional commentary is included.",
    ]
)

OORA_CUE = "Future frames {frames} for object [{object}]:"
