"""
Hierarquia de exceções do simulador RFT.

Todas herdam de ValueError (entrada inválida) através de RFTError, de modo
que código cliente pode capturar tanto a classe específica quanto ValueError.
A CLI usa a classe para decidir o código de saída.
"""


class RFTError(ValueError):
    """Erro base do simulador."""


class ConfigError(RFTError):
    """Configuração ou perfil de material inválido (chave ausente, valor fora de faixa)."""


class TableError(RFTError):
    """Arquivo tabular (CSV/malha) malformado; a mensagem cita a linha."""


class DomainError(RFTError):
    """Argumento fora do domínio físico (ângulo fora da faixa, profundidade negativa)."""


class MeshError(RFTError):
    """Falha na construção da malha do pé."""


class TrajectoryError(RFTError):
    """Série de marcha inválida (tempo não monotônico, amostras insuficientes)."""


class CalibrationError(RFTError):
    """Ajuste de parâmetros sem solução consistente."""

    def __init__(self, parameter: str, message: str):
        self.parameter = parameter
        super().__init__(f"[{parameter}] {message}")


class NoContactError(RFTError):
    """O pé nunca gerou força vertical positiva (sem fase de intrusão)."""
