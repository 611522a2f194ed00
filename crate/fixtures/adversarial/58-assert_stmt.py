gen = ModelGenerator()
a = gen.activity('a')
assert a
final_model = a
