namespace jrsim {}
