gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.parallel(a, a.copy())
