gen = ModelGenerator()
a = gen.activity('a')
for i in range(3):
    a = gen.activity('x')
final_model = a
