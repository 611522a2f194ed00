gen = ModelGenerator()
a = gen.activity('a')
final_model = a.__class__.__bases__
