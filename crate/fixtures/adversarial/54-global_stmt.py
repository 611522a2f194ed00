gen = ModelGenerator()
a = gen.activity('a')
global a
final_model = a
