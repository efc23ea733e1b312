# filepath: run.py
from flask.cli import FlaskGroup

from app import create_app

cli = FlaskGroup(create_app=create_app, add_default_commands=False, load_dotenv=False,
                 help="Simulador adversarial de car-following: train | eval | baseline | oracle | plot")

if __name__ == "__main__":
    cli()
