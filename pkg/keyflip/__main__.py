from keyflip.main import run

run()
