gen = ModelGenerator()
a = gen.activity('a')
b = gen.activity('b')
final_model = gen.sequence(a, b)
