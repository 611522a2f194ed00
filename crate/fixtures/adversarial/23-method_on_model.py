gen = ModelGenerator()
a = gen.activity('a')
final_model = a.activity('b')
