gen = ModelGenerator()
a = gen.activity('a')
setattr(gen, 'x', 1)
final_model = a
