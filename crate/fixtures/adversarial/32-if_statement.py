gen = ModelGenerator()
a = gen.activity('a')
if a:
    final_model = a
