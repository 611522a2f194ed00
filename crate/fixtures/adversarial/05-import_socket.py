import socket
final_model = socket.socket()
