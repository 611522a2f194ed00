gen = ModelGenerator()
a = gen.activity('a')
del a
final_model = gen.activity('b')
