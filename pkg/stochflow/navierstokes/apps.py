from django.apps import AppConfig


class NavierStokesConfig(AppConfig):
    name = 'stochflow.navierstokes'
    verbose_name = "Navier-Stokes"
