def f():
    return 1
final_model = f()
