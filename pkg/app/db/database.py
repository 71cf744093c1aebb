# app/db/database.py

from contextlib import contextmanager
from typing import Iterator

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

Base = declarative_base()


def make_engine(database_url: str) -> Engine:
    engine = create_engine(database_url)
    # models must be imported before create_all sees their tables
    from app.models import run  # noqa: F401

    Base.metadata.create_all(bind=engine)
    return engine


@contextmanager
def open_session(database_url: str) -> Iterator[Session]:
    engine = make_engine(database_url)
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    db = SessionLocal()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
        engine.dispose()
