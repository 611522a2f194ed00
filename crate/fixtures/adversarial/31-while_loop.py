gen = ModelGenerator()
a = gen.activity('a')
while True:
    pass
final_model = a
