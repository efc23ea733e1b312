from flask import Flask

def create_app():
    app = Flask(__name__)

    # Importar e registrar os Blueprints dos comandos
    from app.commands.experiment_commands import experiment_bp
    from app.commands.analysis_commands import analysis_bp

    # Registrar os Blueprints
    app.register_blueprint(experiment_bp)  # train, eval, baseline
    app.register_blueprint(analysis_bp)  # oracle, plot

    return app
