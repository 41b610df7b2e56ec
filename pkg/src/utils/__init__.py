"""
Utilitários do simulador.

Módulos:
    - logger: Sistema de logging configurável
    - tables: Leitura/escrita de séries tabulares (traços, registros, malhas)
"""

__all__ = ["logger", "tables"]
