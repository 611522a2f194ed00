gen = ModelGenerator()
a = gen.activity('a')
result = a
