gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.__class__
