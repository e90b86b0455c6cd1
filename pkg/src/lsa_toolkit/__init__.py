"""LSA Toolkit - 언어 기반 장면 그래프 예측(LSA) 도구 모음.

관찰된 장면 그래프를 텍스트로 변환하고, 2단계 LLM 프롬프트(GOA → OORA)로
미래 프레임의 장면 그래프를 예측하고 평가한다.
"""

__version__ = "0.3.0"
