gen = ModelGenerator()
a = gen.activity('a')
final_model = getattr(gen, 'activity')('x')
