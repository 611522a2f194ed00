gen = ModelGenerator()
a = gen.activity('a')
x = final_model = a
