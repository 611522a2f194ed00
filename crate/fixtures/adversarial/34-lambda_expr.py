gen = ModelGenerator()
a = gen.activity('a')
f = lambda x: x
final_model = a
