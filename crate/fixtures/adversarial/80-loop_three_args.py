gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.loop(a, None, a.copy())
