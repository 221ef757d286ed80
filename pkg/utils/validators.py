"""
Validateurs et exceptions pour la bibliothèque TelegraphOT
"""

import functools
import inspect
import math
from typing import Any, Dict, Iterable, List, Optional


class ValidationError(Exception):
    """Exception pour les erreurs de validation"""
    def __init__(self, message: str, field: str = None):
        self.message = message
        self.field = field
        super().__init__(self.message)


class DomainError(ValidationError):
    """Argument hors du domaine d'une opération"""


class ConfigError(ValidationError):
    """Configuration de ligne de commande invalide"""


class QuadratureError(ValidationError):
    """Tolérance de quadrature non atteinte"""
    def __init__(self, message: str, estimate: Any = None, error_bound: Any = None,
                 subdivisions: Optional[int] = None):
        self.estimate = estimate
        self.error_bound = error_bound
        self.subdivisions = subdivisions
        super().__init__(message, field=None)


class ValidationResult:
    """Résultat de validation"""
    def __init__(self, is_valid: bool = True, errors: List[str] = None):
        self.is_valid = is_valid
        self.errors = errors or []

    def add_error(self, error: str):
        """Ajouter une erreur"""
        self.errors.append(error)
        self.is_valid = False


class BaseValidator:
    """Classe de base pour les validateurs"""

    def __init__(self, required: bool = True):
        self.required = required

    def validate(self, value: Any, field_name: str = None) -> ValidationResult:
        """Valider une valeur"""
        result = ValidationResult()

        if value is None:
            if self.required:
                result.add_error(f"Le paramètre {field_name or 'value'} est requis")
            return result

        return self._validate_value(value, field_name)

    def _validate_value(self, value: Any, field_name: str = None) -> ValidationResult:
        """Validation spécifique à implémenter dans les sous-classes"""
        return ValidationResult()


class FloatValidator(BaseValidator):
    """Validateur pour les réels finis, bornes larges ou strictes"""

    def __init__(self, min_value: float = None, max_value: float = None,
                 strict_min: bool = False, strict_max: bool = False,
                 allow_inf: bool = False, **kwargs):
        super().__init__(**kwargs)
        self.min_value = min_value
        self.max_value = max_value
        self.strict_min = strict_min
        self.strict_max = strict_max
        self.allow_inf = allow_inf

    def _validate_value(self, value: Any, field_name: str = None) -> ValidationResult:
        result = ValidationResult()
        name = field_name or 'Value'

        try:
            value = float(value)
        except (TypeError, ValueError):
            result.add_error(f"{name} doit être un nombre")
            return result

        if math.isnan(value) or (math.isinf(value) and not self.allow_inf):
            result.add_error(f"{name} doit être fini (reçu {value})")
            return result

        if self.min_value is not None:
            if self.strict_min and value <= self.min_value:
                result.add_error(f"{name} doit être strictement supérieur à {self.min_value} (reçu {value})")
            elif value < self.min_value:
                result.add_error(f"{name} doit être au moins {self.min_value} (reçu {value})")

        if self.max_value is not None:
            if self.strict_max and value >= self.max_value:
                result.add_error(f"{name} doit être strictement inférieur à {self.max_value} (reçu {value})")
            elif value > self.max_value:
                result.add_error(f"{name} ne peut pas dépasser {self.max_value} (reçu {value})")

        return result


class IntegerValidator(BaseValidator):
    """Validateur pour les entiers"""

    def __init__(self, min_value: int = None, max_value: int = None, **kwargs):
        super().__init__(**kwargs)
        self.min_value = min_value
        self.max_value = max_value

    def _validate_value(self, value: Any, field_name: str = None) -> ValidationResult:
        result = ValidationResult()
        name = field_name or 'Value'

        if isinstance(value, bool) or not hasattr(value, '__index__'):
            result.add_error(f"{name} doit être un nombre entier")
            return result
        value = int(value)

        if self.min_value is not None and value < self.min_value:
            result.add_error(f"{name} doit être au moins {self.min_value}")
        if self.max_value is not None and value > self.max_value:
            result.add_error(f"{name} ne peut pas dépasser {self.max_value}")

        return result


class ChoiceValidator(BaseValidator):
    """Validateur pour un ensemble fini de valeurs"""

    def __init__(self, choices: Iterable[Any], **kwargs):
        super().__init__(**kwargs)
        self.choices = list(choices)

    def _validate_value(self, value: Any, field_name: str = None) -> ValidationResult:
        result = ValidationResult()
        if value not in self.choices:
            allowed = ', '.join(str(c) for c in self.choices)
            result.add_error(f"{field_name or 'Value'} doit être l'une des valeurs suivantes: {allowed}")
        return result


def validate_data(data: Dict[str, Any], validators: Dict[str, BaseValidator]) -> ValidationResult:
    """
    Valider un dictionnaire de données

    Args:
        data: Données à valider
        validators: Validateurs par nom de champ

    Returns:
        Résultat agrégé
    """
    result = ValidationResult()

    for field_name, validator in validators.items():
        field_result = validator.validate(data.get(field_name), field_name)
        for error in field_result.errors:
            result.add_error(error)

    return result


def validate_params(**validators: BaseValidator):
    """Décorateur qui valide les arguments d'une opération publique"""
    def decorator(func):
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            bound = signature.bind(*args, **kwargs)
            bound.apply_defaults()

            for field_name, validator in validators.items():
                result = validator.validate(bound.arguments.get(field_name), field_name)
                if not result.is_valid:
                    raise DomainError(f"{func.__name__}: " + "; ".join(result.errors), field=field_name)

            return func(*args, **kwargs)

        return wrapper

    return decorator
