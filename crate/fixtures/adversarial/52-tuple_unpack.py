gen = ModelGenerator()
a = gen.activity('a')
x, y = a, a
final_model = x
