gen = ModelGenerator()
a = gen.activity('a')
a += a
final_model = a
