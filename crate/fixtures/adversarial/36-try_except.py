gen = ModelGenerator()
a = gen.activity('a')
try:
    final_model = a
except Exception:
    pass
