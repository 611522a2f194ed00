gen = ModelGenerator()
a = gen.activity('a')
print(a)
final_model = a
