gen = ModelGenerator()
a = gen.activity('a')
f = open('secrets.txt')
final_model = a
