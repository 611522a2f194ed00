gen = ModelGenerator()
a = gen.activity('a')
final_model = a.copy().activity('b')
