gen = ModelGenerator()
a = gen.activity('a')
d = {}
final_model = a
