# env.py
from dotenv import load_dotenv
load_dotenv(override=True)
