"""학습 목적 함수 수치 구현 (외부 트레이너용)."""
