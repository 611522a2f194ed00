gen = ModelGenerator()
a = gen.activity('a')
return a
