gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(gen.xor(a, a))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))
